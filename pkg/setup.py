import os

import numpy as np
from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("FOURFRAMES_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:  # pure-python install; jets falls back to numpy kernels
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "fourframes._jetcore",
                    ["src/fourframes/_jetcore.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
