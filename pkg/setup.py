"""Build script for the optional compiled kernels.

The package is fully functional without a compiler: the extension is
marked optional and `seqrec.kernels` falls back to the numpy
implementation when `seqrec.kernels._inner` is absent.
"""

from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize
except ImportError:  # no toolchain: install pure-python only
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "seqrec.kernels._inner",
                ["src/seqrec/kernels/_inner.pyx"],
                include_dirs=[np.get_include()],
                optional=True,
            )
        ],
        language_level="3",
    )

setup(ext_modules=ext_modules)
