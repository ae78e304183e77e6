"""CMake-driven build of the _riszf extension.

The CMake tree is the single source of truth for compiling the core
library; this shim drives it from pip and copies the resulting module
into the wheel. For development installs use

    pip install -e . --no-build-isolation
"""

import shutil
import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext):
        source_dir = Path(__file__).resolve().parent
        build_dir = Path(self.build_temp) / "cmake"
        build_dir.mkdir(parents=True, exist_ok=True)

        configure = [
            "cmake",
            "-S",
            str(source_dir),
            "-B",
            str(build_dir),
            "-DCMAKE_BUILD_TYPE=Release",
            "-DSKBUILD=ON",
            "-DRISZF_BUILD_TESTS=OFF",
            f"-Dpybind11_DIR={self._pybind11_dir()}",
            f"-DPYTHON_EXECUTABLE={sys.executable}",
        ]
        subprocess.run(configure, check=True)
        subprocess.run(
            ["cmake", "--build", str(build_dir), "--target", "_riszf", "-j"],
            check=True,
        )

        produced = list((build_dir / "python" / "riszf").glob("_riszf*"))
        if not produced:
            raise RuntimeError("cmake did not produce the _riszf module")
        target = Path(self.get_ext_fullpath(ext.name))
        target.parent.mkdir(parents=True, exist_ok=True)
        shutil.copy2(produced[0], target)

    @staticmethod
    def _pybind11_dir():
        import pybind11

        return pybind11.get_cmake_dir()


setup(
    ext_modules=[CMakeExtension("riszf._riszf")],
    cmdclass={"build_ext": CMakeBuild},
)
