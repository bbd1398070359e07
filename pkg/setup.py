from setuptools import Extension, setup

# The compiled scan kernels are optional: the package falls back to the
# vectorized numpy implementation when the extension is unavailable.
try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "doakit.kernels._core",
                ["src/doakit/kernels/_core.pyx"],
                include_dirs=[np.get_include()],
                optional=True,
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
