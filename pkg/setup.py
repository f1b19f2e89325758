import os

from setuptools import Extension, setup

try:
    if not os.path.exists("src/ponedge/_kernel/_ckernel.pyx"):
        raise ImportError("no compiled kernel source in this tree")
    from Cython.Build import cythonize

    # No -ffast-math: the compiled kernel must keep strict IEEE semantics so
    # that it stays bit-identical with the pure-Python fallback.
    ext_modules = cythonize(
        [
            Extension(
                "ponedge._kernel._ckernel",
                ["src/ponedge/_kernel/_ckernel.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
