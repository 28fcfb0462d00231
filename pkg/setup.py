"""Build script: compiles the optional Cython slot kernel.

The package works without the extension (a pure-Python twin is selected at
import time); the extension is only a speedup for the per-slot SINR loop.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "t2tsched.engine._ckernel",
                sources=["src/t2tsched/engine/_ckernel.pyx"],
                # -ffp-contract=off keeps the compiled kernel bit-identical
                # to the pure-Python twin (no fused multiply-add).
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
