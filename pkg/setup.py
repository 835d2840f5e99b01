"""Build script: compiles the geometry kernel extension when Cython and a C
compiler are available, and falls back to the pure-Python kernels otherwise."""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/tricenter/_kernels.pyx"],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except Exception as exc:  # pragma: no cover - build environment dependent
    print(f"tricenter: building without compiled kernels ({exc})")

setup(ext_modules=ext_modules)
