"""Build script.

The package is pure Python except for an optional Cython extension that
accelerates eCPM range derivation (the O(n^2) per-auction kernel).  When
Cython or a C compiler is unavailable the extension is skipped and the
package falls back to the pure-Python kernel at import time.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("BIDSCAPE_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [Extension("bidscape._kernels", ["src/bidscape/_kernels.pyx"])],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
