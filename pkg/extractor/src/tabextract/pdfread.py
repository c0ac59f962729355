"""Minimal PDF reader: objects, pages and positioned words.

Covers the slice of PDF needed to pull word boxes out of straightforward,
non-incremental files: classic xref tables (with a sequential-scan fallback),
uncompressed or Flate content streams, and text set in standard-14 fonts or
fonts carrying a /Widths array. Glyph codes are read as Latin-1, which agrees
with WinAnsi/Standard encoding over the printable ASCII range this targets.
Object streams, cross-reference streams, predictors, CID fonts and non-Flate
filters are out of scope and raise `PdfError`.

Output coordinates use the page's top-left corner as origin with y growing
downward. Words come back in reading order: lines grouped by baseline, then
left to right.
"""

from __future__ import annotations

import base64
import re
import zlib
from dataclasses import dataclass
from pathlib import Path

from reportlab.pdfbase import pdfmetrics

_WHITESPACE = b"\x00\t\n\x0c\r "
_DELIMITERS = b"()<>[]{}/%"


class PdfError(Exception):
    """The file is not a PDF we can read."""


@dataclass(frozen=True)
class Ref:
    num: int
    gen: int


class Operator(str):
    """A bare keyword in a content stream (distinct from string operands)."""


# ---------------------------------------------------------------------------
# object syntax


class _Lexer:
    def __init__(self, data: bytes, pos: int = 0):
        self.data = data
        self.pos = pos

    def _skip_ws(self) -> None:
        data, n = self.data, len(self.data)
        while self.pos < n:
            b = data[self.pos]
            if b in _WHITESPACE:
                self.pos += 1
            elif b == 0x25:  # '%' comment to end of line
                while self.pos < n and data[self.pos] not in b"\r\n":
                    self.pos += 1
            else:
                return

    def at_keyword(self, word: bytes) -> bool:
        self._skip_ws()
        end = self.pos + len(word)
        if self.data[self.pos : end] != word:
            return False
        return end >= len(self.data) or self.data[end] in _WHITESPACE or self.data[end] in _DELIMITERS

    def expect_keyword(self, word: bytes) -> None:
        if not self.at_keyword(word):
            raise PdfError(f"expected {word.decode()!r} at byte {self.pos}")
        self.pos += len(word)

    def parse_value(self):
        self._skip_ws()
        if self.pos >= len(self.data):
            raise PdfError("unexpected end of data")
        b = self.data[self.pos]
        if b == 0x3C:  # '<'
            if self.data[self.pos + 1 : self.pos + 2] == b"<":
                return self._parse_dict()
            return self._parse_hex_string()
        if b == 0x28:  # '('
            return self._parse_literal_string()
        if b == 0x2F:  # '/'
            return self._parse_name()
        if b == 0x5B:  # '['
            return self._parse_array()
        if b in b"+-.0123456789":
            return self._parse_number_or_ref()
        return self._parse_keyword()

    def _parse_dict(self) -> dict:
        self.pos += 2
        out = {}
        while True:
            self._skip_ws()
            if self.data[self.pos : self.pos + 2] == b">>":
                self.pos += 2
                return out
            key = self.parse_value()
            if not isinstance(key, str) or isinstance(key, Operator):
                raise PdfError(f"dictionary key must be a name (byte {self.pos})")
            out[key] = self.parse_value()

    def _parse_array(self) -> list:
        self.pos += 1
        out = []
        while True:
            self._skip_ws()
            if self.data[self.pos] == 0x5D:  # ']'
                self.pos += 1
                return out
            out.append(self.parse_value())

    def _parse_name(self) -> str:
        self.pos += 1
        raw = bytearray()
        data, n = self.data, len(self.data)
        while self.pos < n:
            b = data[self.pos]
            if b in _WHITESPACE or b in _DELIMITERS:
                break
            if b == 0x23 and self.pos + 2 < n:  # '#' hex escape
                raw.append(int(data[self.pos + 1 : self.pos + 3], 16))
                self.pos += 3
            else:
                raw.append(b)
                self.pos += 1
        return raw.decode("latin-1")

    def _parse_literal_string(self) -> bytes:
        self.pos += 1
        out = bytearray()
        depth = 1
        data, n = self.data, len(self.data)
        while self.pos < n:
            b = data[self.pos]
            self.pos += 1
            if b == 0x5C:  # backslash
                e = data[self.pos]
                self.pos += 1
                if e in b"nrtbf":
                    out.append({0x6E: 10, 0x72: 13, 0x74: 9, 0x62: 8, 0x66: 12}[e])
                elif e in b"()\\":
                    out.append(e)
                elif e in b"01234567":
                    code = e - 0x30
                    for _ in range(2):
                        if self.pos < n and data[self.pos] in b"01234567":
                            code = code * 8 + (data[self.pos] - 0x30)
                            self.pos += 1
                    out.append(code & 0xFF)
                elif e in b"\r\n":  # line continuation
                    if e == 0x0D and self.pos < n and data[self.pos] == 0x0A:
                        self.pos += 1
                else:
                    out.append(e)
            elif b == 0x28:
                depth += 1
                out.append(b)
            elif b == 0x29:
                depth -= 1
                if depth == 0:
                    return bytes(out)
                out.append(b)
            elif b == 0x0D:  # EOL inside string normalizes to \n
                out.append(0x0A)
                if self.pos < n and data[self.pos] == 0x0A:
                    self.pos += 1
            else:
                out.append(b)
        raise PdfError("unterminated string")

    def _parse_hex_string(self) -> bytes:
        self.pos += 1
        digits = []
        data, n = self.data, len(self.data)
        while self.pos < n:
            b = data[self.pos]
            self.pos += 1
            if b == 0x3E:  # '>'
                if len(digits) % 2:
                    digits.append(0x30)
                try:
                    return bytes(
                        int(chr(digits[i]) + chr(digits[i + 1]), 16)
                        for i in range(0, len(digits), 2)
                    )
                except ValueError as exc:
                    raise PdfError(f"bad hex string digit: {exc}") from exc
            if b not in _WHITESPACE:
                digits.append(b)
        raise PdfError("unterminated hex string")

    def _parse_number_or_ref(self):
        num = self._parse_number()
        if isinstance(num, int) and num >= 0:
            save = self.pos
            self._skip_ws()
            gen_start = self.pos
            if self.pos < len(self.data) and self.data[self.pos] in b"0123456789":
                while self.pos < len(self.data) and self.data[self.pos] in b"0123456789":
                    self.pos += 1
                gen = int(self.data[gen_start : self.pos])
                if self.at_keyword(b"R"):
                    self.pos += 1
                    return Ref(num, gen)
            self.pos = save
        return num

    def _parse_number(self):
        start = self.pos
        data, n = self.data, len(self.data)
        if data[self.pos] in b"+-":
            self.pos += 1
        is_float = False
        while self.pos < n and data[self.pos] in b".0123456789":
            if data[self.pos] == 0x2E:
                is_float = True
            self.pos += 1
        token = data[start : self.pos]
        if token in (b"", b"+", b"-"):
            raise PdfError(f"malformed number at byte {start}")
        return float(token) if is_float else int(token)

    def _parse_keyword(self):
        start = self.pos
        data, n = self.data, len(self.data)
        while self.pos < n and data[self.pos] not in _WHITESPACE and data[self.pos] not in _DELIMITERS:
            self.pos += 1
        word = data[start : self.pos]
        if not word:
            raise PdfError(f"unexpected byte {data[start]:#x} at {start}")
        if word == b"true":
            return True
        if word == b"false":
            return False
        if word == b"null":
            return None
        return Operator(word.decode("latin-1"))


# ---------------------------------------------------------------------------
# document model


@dataclass
class Page:
    media_box: tuple[float, float, float, float]  # llx, lly, urx, ury
    resources: dict
    content: bytes


class _Stream:
    def __init__(self, sdict: dict, raw_start: int):
        self.dict = sdict
        self.raw_start = raw_start  # offset of the first data byte


class PdfDocument:
    def __init__(self, path: str | Path):
        self.path = Path(path)
        try:
            self.data = self.path.read_bytes()
        except OSError as exc:
            raise PdfError(f"cannot read {path}: {exc}") from exc
        if not self.data.startswith(b"%PDF-"):
            raise PdfError(f"{path} has no %PDF header")
        self._cache: dict[int, object] = {}
        self._offsets: dict[int, int] = {}
        self.trailer: dict = {}
        try:
            self._load_xref()
        except PdfError:
            self._scan_objects()
        if not self._offsets and not self._cache:
            raise PdfError(f"{path}: no objects found")

    # -- cross references ---------------------------------------------------

    def _load_xref(self) -> None:
        anchor = self.data.rfind(b"startxref")
        if anchor < 0:
            raise PdfError("no startxref")
        lex = _Lexer(self.data, anchor + len(b"startxref"))
        offset = lex.parse_value()
        if not isinstance(offset, int):
            raise PdfError("bad startxref offset")
        seen = set()
        while offset is not None and offset not in seen:
            seen.add(offset)
            lex = _Lexer(self.data, offset)
            if not lex.at_keyword(b"xref"):
                raise PdfError("cross-reference streams are not supported")
            lex.pos += len(b"xref")
            while True:
                if lex.at_keyword(b"trailer"):
                    lex.pos += len(b"trailer")
                    trailer = lex.parse_value()
                    if not isinstance(trailer, dict):
                        raise PdfError("malformed trailer")
                    for k, v in trailer.items():  # older trailers never override newer
                        self.trailer.setdefault(k, v)
                    prev = trailer.get("Prev")
                    offset = prev if isinstance(prev, int) else None
                    break
                first = lex.parse_value()
                count = lex.parse_value()
                if not isinstance(first, int) or not isinstance(count, int):
                    raise PdfError("malformed xref subsection")
                for i in range(count):
                    entry_offset = lex.parse_value()
                    lex.parse_value()  # generation
                    kind = lex.parse_value()
                    if not isinstance(entry_offset, int) or str(kind) not in ("n", "f"):
                        raise PdfError("malformed xref entry")
                    if str(kind) == "n":
                        self._offsets.setdefault(first + i, entry_offset)
        if "Root" not in self.trailer:
            raise PdfError("trailer has no /Root")

    def _scan_objects(self) -> None:
        """Fallback for files without a usable xref table: walk objects head
        to tail (stream bodies are jumped over, never scanned)."""
        self._offsets.clear()
        self._cache.clear()
        pos = 0
        header = re.compile(rb"(\d+)\s+(\d+)\s+obj\b")
        while True:
            m = header.search(self.data, pos)
            if not m:
                break
            num = int(m.group(1))
            value, end = self._parse_object_at(m.start())
            self._cache[num] = value
            pos = end
        trailer_pos = self.data.rfind(b"trailer")
        if trailer_pos >= 0:
            try:
                t = _Lexer(self.data, trailer_pos + len(b"trailer")).parse_value()
                if isinstance(t, dict):
                    self.trailer = t
            except PdfError:
                pass
        if "Root" not in self.trailer:
            for num, value in self._cache.items():
                v = value.dict if isinstance(value, _Stream) else value
                if isinstance(v, dict) and v.get("Type") == "Catalog":
                    self.trailer = {"Root": Ref(num, 0)}
                    break
        if "Root" not in self.trailer:
            raise PdfError("no document catalog found")

    # -- objects ------------------------------------------------------------

    def _parse_object_at(self, offset: int):
        """Parse `num gen obj ... endobj` at `offset`; returns (value, end)."""
        lex = _Lexer(self.data, offset)
        lex.parse_value()  # object number
        lex.parse_value()  # generation
        lex.expect_keyword(b"obj")
        value = lex.parse_value()
        lex._skip_ws()
        if lex.at_keyword(b"stream"):
            if not isinstance(value, dict):
                raise PdfError(f"stream without dictionary at byte {offset}")
            lex.pos += len(b"stream")
            if self.data[lex.pos : lex.pos + 2] == b"\r\n":
                lex.pos += 2
            elif self.data[lex.pos : lex.pos + 1] in (b"\n", b"\r"):
                lex.pos += 1
            value = _Stream(value, lex.pos)
            length = value.dict.get("Length")
            skip = length if isinstance(length, int) else 0
            end_kw = self.data.find(b"endstream", lex.pos + skip)
            if end_kw < 0:
                raise PdfError(f"unterminated stream at byte {offset}")
            lex.pos = end_kw + len(b"endstream")
        lex._skip_ws()
        if lex.at_keyword(b"endobj"):
            lex.pos += len(b"endobj")
        return value, lex.pos

    def get(self, ref: Ref):
        if ref.num not in self._cache:
            if ref.num not in self._offsets:
                return None
            value, _ = self._parse_object_at(self._offsets[ref.num])
            self._cache[ref.num] = value
        return self._cache[ref.num]

    def resolve(self, value):
        while isinstance(value, Ref):
            value = self.get(value)
        return value

    def stream_bytes(self, stream: _Stream) -> bytes:
        length = self.resolve(stream.dict.get("Length"))
        start = stream.raw_start
        if isinstance(length, int) and length >= 0:
            raw = self.data[start : start + length]
        else:
            end = self.data.find(b"endstream", start)
            if end < 0:
                raise PdfError("unterminated stream")
            raw = self.data[start:end].rstrip(b"\r\n")
        filters = self.resolve(stream.dict.get("Filter"))
        if filters is None:
            filters = []
        elif not isinstance(filters, list):
            filters = [filters]
        parms = self.resolve(stream.dict.get("DecodeParms"))
        if parms:
            parms_list = parms if isinstance(parms, list) else [parms]
            for p in parms_list:
                p = self.resolve(p)
                if isinstance(p, dict) and self.resolve(p.get("Predictor", 1)) not in (None, 1):
                    raise PdfError("stream predictors are not supported")
        for f in filters:
            f = self.resolve(f)
            if f == "FlateDecode":
                try:
                    raw = zlib.decompress(raw)
                except zlib.error as exc:
                    raise PdfError(f"bad Flate stream: {exc}") from exc
            elif f == "ASCII85Decode":
                data = bytes(raw).translate(None, _WHITESPACE)
                if not data.endswith(b"~>"):
                    raise PdfError("ASCII85 stream without ~> terminator")
                try:
                    raw = base64.a85decode(data, adobe=True)
                except ValueError as exc:
                    raise PdfError(f"bad ASCII85 stream: {exc}") from exc
            else:
                raise PdfError(f"unsupported stream filter /{f}")
        return raw

    # -- pages --------------------------------------------------------------

    def pages(self) -> list[Page]:
        catalog = self.resolve(self.trailer["Root"])
        if not isinstance(catalog, dict) or "Pages" not in catalog:
            raise PdfError("document catalog has no page tree")
        out: list[Page] = []
        self._walk_pages(catalog["Pages"], None, None, out, depth=0)
        if not out:
            raise PdfError("document has no pages")
        return out

    def _walk_pages(self, node_ref, media_box, resources, out: list[Page], depth: int) -> None:
        if depth > 64:
            raise PdfError("page tree too deep (cycle?)")
        node = self.resolve(node_ref)
        if not isinstance(node, dict):
            raise PdfError("malformed page tree node")
        if "MediaBox" in node:
            media_box = [float(self.resolve(v)) for v in self.resolve(node["MediaBox"])]
        if "Resources" in node:
            resources = self.resolve(node["Resources"])
        if node.get("Type") == "Pages" or "Kids" in node:
            for kid in self.resolve(node.get("Kids", [])):
                self._walk_pages(kid, media_box, resources, out, depth + 1)
            return
        if media_box is None or len(media_box) != 4:
            raise PdfError("page without a MediaBox")
        out.append(
            Page(
                media_box=tuple(media_box),
                resources=resources if isinstance(resources, dict) else {},
                content=self._page_content(node),
            )
        )

    def _page_content(self, page_dict: dict) -> bytes:
        contents = self.resolve(page_dict.get("Contents"))
        if contents is None:
            return b""
        parts = contents if isinstance(contents, list) else [contents]
        chunks = []
        for part in parts:
            part = self.resolve(part)
            if not isinstance(part, _Stream):
                raise PdfError("page contents is not a stream")
            chunks.append(self.stream_bytes(part))
        return b"\n".join(chunks)


# ---------------------------------------------------------------------------
# fonts


_SUBSET_PREFIX = re.compile(r"^[A-Z]{6}\+")


class _Font:
    """Per-glyph width and vertical extent, per unit of font size."""

    def __init__(self, fdict: dict, doc: PdfDocument):
        base = doc.resolve(fdict.get("BaseFont"))
        self.base = _SUBSET_PREFIX.sub("", base) if isinstance(base, str) else ""
        self.widths = None
        self.first_char = 0
        self.missing_width = 0.5
        self.ascent = 0.75
        self.descent = -0.25
        self.rl_name = None

        widths = doc.resolve(fdict.get("Widths"))
        if isinstance(widths, list) and widths:
            self.widths = [float(doc.resolve(w)) / 1000.0 for w in widths]
            self.first_char = int(doc.resolve(fdict.get("FirstChar", 0)))
            desc = doc.resolve(fdict.get("FontDescriptor"))
            if isinstance(desc, dict):
                self.missing_width = float(doc.resolve(desc.get("MissingWidth", 500))) / 1000.0
                if "Ascent" in desc:
                    self.ascent = float(doc.resolve(desc["Ascent"])) / 1000.0
                if "Descent" in desc:
                    self.descent = float(doc.resolve(desc["Descent"])) / 1000.0
        else:
            try:
                pdfmetrics.getFont(self.base)
                self.rl_name = self.base
            except KeyError:
                pass
            if self.rl_name:
                a, d = pdfmetrics.getAscentDescent(self.rl_name, 1.0)
                self.ascent, self.descent = float(a), float(d)
        if self.descent > 0:  # some descriptors carry the magnitude only
            self.descent = -self.descent

    def char_width(self, code: int) -> float:
        if self.widths is not None:
            idx = code - self.first_char
            if 0 <= idx < len(self.widths):
                return self.widths[idx]
            return self.missing_width
        if self.rl_name:
            return pdfmetrics.stringWidth(chr(code), self.rl_name, 1.0)
        return self.missing_width


# ---------------------------------------------------------------------------
# content interpretation


@dataclass
class Word:
    """A word in top-left-origin page coordinates."""

    text: str
    x1: float
    y1: float
    x2: float
    y2: float
    baseline: float  # top-left-origin y of the text baseline
    size: float


def _mat_mul(a, b):
    a0, a1, a2, a3, a4, a5 = a
    b0, b1, b2, b3, b4, b5 = b
    return (
        a0 * b0 + a1 * b2,
        a0 * b1 + a1 * b3,
        a2 * b0 + a3 * b2,
        a2 * b1 + a3 * b3,
        a4 * b0 + a5 * b2 + b4,
        a4 * b1 + a5 * b3 + b5,
    )


def _apply(m, x, y):
    return (m[0] * x + m[2] * y + m[4], m[1] * x + m[3] * y + m[5])


_IDENTITY = (1.0, 0.0, 0.0, 1.0, 0.0, 0.0)


class _WordBuilder:
    def __init__(self):
        self.chars: list[str] = []
        self.box = None  # xmin, ymin, xmax, ymax (device space)
        self.origin = None  # device-space baseline point of the first glyph
        self.size = 0.0

    def add(self, ch: str, corners, origin, size: float) -> None:
        if not self.chars:
            self.origin = origin
            self.size = size
        self.chars.append(ch)
        xs = [c[0] for c in corners]
        ys = [c[1] for c in corners]
        if self.box is None:
            self.box = (min(xs), min(ys), max(xs), max(ys))
        else:
            b = self.box
            self.box = (min(b[0], *xs), min(b[1], *ys), max(b[2], *xs), max(b[3], *ys))


def _interpret(content: bytes, fonts: dict[str, _Font]) -> list[tuple]:
    """Run the text-relevant subset of the content stream; returns raw words
    as (text, xmin, ymin, xmax, ymax, baseline_y, size) in device space."""
    words: list[tuple] = []
    ctm = _IDENTITY
    stack: list[tuple] = []
    font: _Font | None = None
    size = 0.0
    leading = 0.0
    char_spacing = 0.0
    word_spacing = 0.0
    h_scale = 1.0
    tm = tlm = _IDENTITY
    current = _WordBuilder()

    def flush():
        nonlocal current
        if current.chars:
            words.append(
                ("".join(current.chars), *current.box, current.origin[1], current.size)
            )
        current = _WordBuilder()

    def show(text: bytes):
        nonlocal tm
        if font is None:
            return
        for code in text:
            ch = chr(code)
            w0 = font.char_width(code)
            if ch.isspace():
                flush()
            else:
                fs = size
                corners_text = (
                    (0.0, font.descent * fs),
                    (w0 * fs, font.descent * fs),
                    (0.0, font.ascent * fs),
                    (w0 * fs, font.ascent * fs),
                )
                trm = _mat_mul(tm, ctm)
                corners = [_apply(trm, x, y) for x, y in corners_text]
                current.add(ch, corners, _apply(trm, 0.0, 0.0), fs)
            advance = (w0 * size + char_spacing + (word_spacing if code == 32 else 0.0)) * h_scale
            tm = _mat_mul((1.0, 0.0, 0.0, 1.0, advance, 0.0), tm)

    def next_line(tx: float, ty: float):
        nonlocal tm, tlm
        tlm = _mat_mul((1.0, 0.0, 0.0, 1.0, tx, ty), tlm)
        tm = tlm

    lex = _Lexer(content)
    operands: list = []
    while True:
        lex._skip_ws()
        if lex.pos >= len(lex.data):
            break
        token = lex.parse_value()
        if not isinstance(token, Operator):
            operands.append(token)
            continue
        op = str(token)
        try:
            if op == "q":
                stack.append((ctm, font, size, leading, char_spacing, word_spacing, h_scale))
            elif op == "Q":
                if stack:
                    ctm, font, size, leading, char_spacing, word_spacing, h_scale = stack.pop()
            elif op == "cm":
                ctm = _mat_mul(tuple(float(v) for v in operands[-6:]), ctm)
            elif op == "BT":
                tm = tlm = _IDENTITY
            elif op == "ET":
                flush()
            elif op == "Tf":
                font = fonts.get(str(operands[-2]))
                size = float(operands[-1])
            elif op == "TL":
                leading = float(operands[-1])
            elif op == "Tc":
                char_spacing = float(operands[-1])
            elif op == "Tw":
                word_spacing = float(operands[-1])
            elif op == "Tz":
                h_scale = float(operands[-1]) / 100.0
            elif op == "Td":
                flush()
                next_line(float(operands[-2]), float(operands[-1]))
            elif op == "TD":
                flush()
                leading = -float(operands[-1])
                next_line(float(operands[-2]), float(operands[-1]))
            elif op == "Tm":
                flush()
                tm = tlm = tuple(float(v) for v in operands[-6:])
            elif op == "T*":
                flush()
                next_line(0.0, -leading)
            elif op == "Tj":
                show(operands[-1])
            elif op == "'":
                flush()
                next_line(0.0, -leading)
                show(operands[-1])
            elif op == '"':
                flush()
                word_spacing = float(operands[-3])
                char_spacing = float(operands[-2])
                next_line(0.0, -leading)
                show(operands[-1])
            elif op == "TJ":
                for item in operands[-1]:
                    if isinstance(item, bytes):
                        show(item)
                    else:
                        shift = -float(item) / 1000.0 * size * h_scale
                        # a rightward jump beyond a tenth of the size is a gap
                        # between words; a large leftward jump is a relocation
                        if shift > 0.1 * size or shift < -0.5 * size:
                            flush()
                        tm = _mat_mul((1.0, 0.0, 0.0, 1.0, shift, 0.0), tm)
        except (IndexError, TypeError, ValueError) as exc:
            raise PdfError(f"malformed content stream near operator {op!r}: {exc}") from exc
        operands = []
    flush()
    return words


def _page_fonts(page: Page, doc: PdfDocument) -> dict[str, _Font]:
    fonts = {}
    raw = doc.resolve(page.resources.get("Font"))
    if isinstance(raw, dict):
        for name, ref in raw.items():
            fdict = doc.resolve(ref)
            if isinstance(fdict, dict):
                fonts[name] = _Font(fdict, doc)
    return fonts


def page_words(doc: PdfDocument, page: Page) -> list[Word]:
    """All words on a page, top-left-origin coordinates, reading order."""
    raw = _interpret(page.content, _page_fonts(page, doc))
    llx, _lly, _urx, ury = page.media_box
    words = [
        Word(
            text=text,
            x1=xmin - llx,
            y1=ury - ymax,
            x2=xmax - llx,
            y2=ury - ymin,
            baseline=ury - by,
            size=fs,
        )
        for text, xmin, ymin, xmax, ymax, by, fs in raw
    ]
    # group into lines by baseline, top to bottom, then left to right
    words.sort(key=lambda w: w.baseline)
    lines: list[list[Word]] = []
    for w in words:
        if lines and abs(w.baseline - lines[-1][0].baseline) <= 0.5 * max(w.size, lines[-1][0].size):
            lines[-1].append(w)
        else:
            lines.append([w])
    out: list[Word] = []
    for line in lines:
        out.extend(sorted(line, key=lambda w: (w.x1, w.x2)))
    return out
