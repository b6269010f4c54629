from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "bellsim._ckernel",
                ["src/bellsim/_ckernel.pyx"],
                optional=True,
            )
        ],
        language_level=3,
    )
except ImportError:
    # Cython unavailable: install the pure-Python/numpy backend only.
    ext_modules = []

setup(ext_modules=ext_modules)
