import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "srpcp._kernels",
                ["src/srpcp/_kernels.pyx"],
                include_dirs=[np.get_include()],
                # -ffp-contract=off keeps the kernel bitwise-identical to the
                # pure-numpy fallback (no fused multiply-adds).
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
