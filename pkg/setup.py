"""Build script: compiles the optional bulk-evaluation kernel.

The package is fully functional without the extension (a numpy fallback is
selected at import time), so a failed compile only costs speed.
"""

from setuptools import setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/pdlkit/_bulkcy.pyx"],
        compiler_directives={"language_level": "3", "boundscheck": False, "wraparound": False},
    )
except Exception as exc:  # pragma: no cover - build environment without cython
    print(f"pdlkit: skipping compiled kernel ({exc}); pure fallback will be used")
    ext_modules = []

setup(ext_modules=ext_modules)
