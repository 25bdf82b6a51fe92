"""Build the compiled kernel; the package still imports without it."""
import os

import numpy as np
from setuptools import Extension, setup

ext_modules = []
if os.environ.get("EDGETRACE_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:  # pure-Python fallback only
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [Extension("edgetrace._kernels", ["src/edgetrace/_kernels.py"],
                       include_dirs=[np.get_include()],
                       extra_compile_args=["-O3"])],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
