from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    # optional=True: a failed compile degrades to the pure-Python kernels
    # selected at import time by ergosum.kernels.
    ext_modules = cythonize(
        [Extension("ergosum._ext", ["src/ergosum/_ext.pyx"], optional=True)],
        language_level="3",
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
