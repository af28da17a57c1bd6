import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "kghopf.kernel._hillcore",
                ["src/kghopf/kernel/_hillcore.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )

# The compiled core is optional: kghopf.kernel falls back to the pure-Python
# integrator when the extension is missing (see kghopf/kernel/__init__.py).
setup(ext_modules=ext_modules)
