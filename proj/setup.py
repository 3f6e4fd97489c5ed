# SPDX-License-Identifier: Apache-2.0
"""CMake-driven build for the _klmat extension module.

The C++ core, CLI and tests are plain CMake targets; this shim only builds
the pybind11 module and drops it into the klmat package, so `pip install .`
(or `pip install -e . --no-build-isolation`) works without any extra build
tooling.
"""

import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name: str):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext: CMakeExtension) -> None:
        source_dir = Path(__file__).resolve().parent
        ext_path = Path(self.get_ext_fullpath(ext.name)).resolve()
        package_dir = ext_path.parent
        package_dir.mkdir(parents=True, exist_ok=True)
        build_temp = Path(self.build_temp).resolve()
        build_temp.mkdir(parents=True, exist_ok=True)

        cmake_args = [
            f"-DCMAKE_LIBRARY_OUTPUT_DIRECTORY={package_dir}",
            f"-DPython3_EXECUTABLE={sys.executable}",
            "-DCMAKE_BUILD_TYPE=Release",
            "-DKLMAT_BUILD_PYTHON=ON",
            "-DKLMAT_BUILD_TESTS=OFF",
            "-DKLMAT_BUILD_CLI=OFF",
        ]
        subprocess.run(
            ["cmake", "-S", str(source_dir), "-B", str(build_temp), *cmake_args],
            check=True,
        )
        subprocess.run(
            ["cmake", "--build", str(build_temp), "--target", "_klmat", "-j"],
            check=True,
        )
        if not ext_path.exists():
            raise RuntimeError(f"expected extension at {ext_path}")


setup(
    ext_modules=[CMakeExtension("klmat._klmat")],
    cmdclass={"build_ext": CMakeBuild},
)
