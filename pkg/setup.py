"""Build hook for the optional Cython kernel; metadata lives in pyproject.toml."""

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "frechetds._dfd",
                ["src/frechetds/_dfd.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    # no Cython available: the package runs on the numpy fallback
    pass

setup(ext_modules=ext_modules)
