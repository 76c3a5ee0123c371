import warnings

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the accelerator module if possible, fall back to pure Python."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler or Cython missing
            warnings.warn(f"compiled kernels skipped ({exc}); using Python fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            warnings.warn(f"compiled kernels skipped ({exc}); using Python fallback")


def make_extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "mleachsim._speedups",
        sources=["src/mleachsim/_speedups.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(
    ext_modules=make_extensions(),
    cmdclass={"build_ext": OptionalBuildExt},
)
