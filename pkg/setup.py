#!/usr/bin/env python3
import importlib.util
from pathlib import Path

from setuptools import find_packages, setup

# Paths
ROOT = Path(__file__).resolve().parent
PKG = "hierground"
ABOUT = ROOT / PKG / "about.py"
README = ROOT / "README.md"

# Load metadata from about.py safely
spec = importlib.util.spec_from_file_location(f"{PKG}.about", ABOUT)
about = importlib.util.module_from_spec(spec)
spec.loader.exec_module(about)  # type: ignore[attr-defined]

# Long description
long_description = README.read_text(encoding="utf-8") if README.exists() else ""

# Runtime requirements
install_requires = [
    "numpy>=1.22",
    "nltk>=3.8",
    "rich",
]

setup(
    name="hierGround",
    version=about.__version__,
    description=about.__description__,
    long_description=long_description,
    long_description_content_type="text/markdown",
    author=about.__author__,
    license=about.__license__,
    packages=find_packages(exclude=("tests",)),
    python_requires=">=3.9",
    install_requires=install_requires,
    extras_require={
        "test": ["pytest>=7", "hypothesis>=6"],
    },
    classifiers=[
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Natural Language :: English",
        "Programming Language :: Python :: 3 :: Only",
        "Topic :: Scientific/Engineering :: Artificial Intelligence",
        "Topic :: Scientific/Engineering :: Image Recognition",
    ],
    keywords=["visual grounding", "referring expressions", "attention", "autodiff", "synthetic data"],
    entry_points={
        "console_scripts": [
            "hierGround=hierground.cli:main",
        ],
    },
)
