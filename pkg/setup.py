"""Build the optional compiled simplex kernel.

If Cython or a C compiler is missing the package still installs and uses the
pure-Python kernel.
"""
from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [Extension("decoykit.lp._simplex", ["src/decoykit/lp/_simplex.pyx"], extra_compile_args=["-O3"])],
        language_level="3",
    )
except ImportError:
    pass


try:
    from setuptools.command.build_ext import build_ext

    class optional_build_ext(build_ext):
        def run(self):
            try:
                super().run()
            except Exception as exc:  # compiler unavailable
                print(f"warning: compiled kernel not built ({exc}); using pure Python")

        def build_extension(self, ext):
            try:
                super().build_extension(ext)
            except Exception as exc:
                print(f"warning: failed to build {ext.name} ({exc}); using pure Python")

    cmdclass = {"build_ext": optional_build_ext}
except ImportError:
    cmdclass = {}

setup(ext_modules=ext_modules, cmdclass=cmdclass)
