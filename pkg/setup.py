"""Build script for the optional compiled visibility kernel.

The package is fully functional without the extension (a numpy fallback is
selected at import time); building it just makes visibility-graph
construction faster. If Cython or a C compiler is unavailable the install
proceeds as pure Python.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "tabgraph._visibility_fast",
                sources=["src/tabgraph/_visibility_fast.pyx"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
