import numpy as np
from setuptools import Extension, setup

# The compiled root-refinement core is optional: the package falls back to
# the pure-Python kernels in mws._kernels._pure when the extension is absent.
try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "mws._kernels._core",
                ["src/mws/_kernels/_core.pyx"],
                include_dirs=[np.get_include()],
                # -ffp-contract=off keeps the C arithmetic bit-compatible with
                # the pure-Python mirror (no FMA contraction).
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
