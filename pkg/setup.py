import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python fallback still works
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("stgexplore._kernels", ["src/stgexplore/_kernels.pyx"], include_dirs=[np.get_include()])],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
