import io
import os

from setuptools import find_namespace_packages, setup

DEPENDENCIES = [
    "numpy>=1.26,<3.0",
    "Pillow>=10.0",
    "scipy>=1.11",
    "tqdm>=4.66",
]

package_root = os.path.abspath(os.path.dirname(__file__))

version = {}
with open(os.path.join(package_root, "degflow/version.py")) as fp:
    exec(fp.read(), version)
version = version["__version__"]

with io.open("README.md", "r") as fh:
    long_description = fh.read()

setup(
    name="degflow",
    version=version,
    author="degflow developers",
    description=(
        "Real-world LR degradation modeling with a Fourier prior and rectified flow"
    ),
    long_description=long_description,
    packages=find_namespace_packages(
        include=("degflow", "degflow.*"), exclude=("tests*", "samples*")
    ),
    install_requires=DEPENDENCIES,
    entry_points={"console_scripts": ["degflow=degflow.cli.main:main"]},
    python_requires=">=3.10",
    license="Apache 2.0",
)
