"""Setup script for phaseseg."""

import re
from pathlib import Path

from setuptools import setup, find_packages

ROOT = Path(__file__).parent
TEST_PACKAGES = {"pytest", "pytest-mock", "pytest-cov", "hypothesis", "lxml"}

readme_path = ROOT / "README.md"
long_description = readme_path.read_text(encoding="utf-8") if readme_path.exists() else ""

version = re.search(
    r'^__version__ = "([^"]+)"', (ROOT / "src" / "phaseseg" / "__init__.py").read_text(encoding="utf-8"), re.M
).group(1)


def read_requirements(path: Path):
    """Split requirements.txt into runtime pins and the test/tooling pins after "# Testing"."""
    runtime, extra = [], []
    target = runtime
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line.lower() == "# testing":
            target = extra
        if line and not line.startswith("#"):
            target.append(line)
    return runtime, extra


requirements, dev_requirements = read_requirements(ROOT / "requirements.txt")

setup(
    name="phaseseg",
    version=version,
    description="Causal hierarchical-attention encoder-decoder for online surgical phase recognition",
    long_description=long_description,
    long_description_content_type="text/markdown",
    keywords=["surgical workflow", "phase recognition", "temporal segmentation", "causal attention"],
    package_dir={"": "src"},
    packages=find_packages(where="src"),
    package_data={"phaseseg": ["templates/*.j2"]},
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
        "Topic :: Scientific/Engineering :: Artificial Intelligence",
        "Topic :: Scientific/Engineering :: Medical Science Apps.",
    ],
    python_requires=">=3.8",
    install_requires=requirements,
    extras_require={
        "test": [r for r in dev_requirements if re.split(r"[=<>~!]", r)[0] in TEST_PACKAGES],
        "dev": dev_requirements,
    },
    entry_points={
        "console_scripts": [
            "phaseseg=phaseseg.cli.main:cli",
        ],
    },
    include_package_data=True,
    zip_safe=False,
)
