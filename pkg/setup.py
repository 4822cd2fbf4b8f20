"""Build the optional compiled pair-scoring kernel.

Without Cython or a C++ compiler the package installs pure-Python and the
numpy fallback is used at import.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("NEWSFLOW_NO_EXT", "") in ("", "0"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "newsflow._pairwise",
                    ["src/newsflow/_pairwise.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                    language="c++",
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
