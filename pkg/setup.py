import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "broadclass._kernels",
        ["src/broadclass/_kernels.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
        # a failed compile leaves the numpy fallback in charge
        optional=True,
    )
]

setup(ext_modules=cythonize(extensions, language_level=3))
