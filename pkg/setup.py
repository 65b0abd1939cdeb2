import re

from setuptools import setup

with open("icdsynth/base.py") as f:
    version = re.search(
        r'^__version__\s*=\s*[\'"]([^\'"]*)[\'"]', f.read(), re.MULTILINE
    ).group(1)

with open("README.md", "r", encoding="utf-8") as f:
    long_description = f.read()

setup(
    name="icdsynth",
    version=version,
    description="Pareto-optimal reprogramming attacks on an ICD tachycardia discriminator",
    long_description=long_description,
    long_description_content_type="text/markdown",
    license="MIT",
    packages=["icdsynth", "icdsynth.smt", "icdsynth.synthesis"],
    classifiers=[
        "Programming Language :: Python :: 3",
        "Development Status :: 3 - Alpha",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Topic :: Scientific/Engineering :: Medical Science Apps.",
    ],
    python_requires=">=3.8",
    install_requires=["numpy>=1.22", "pysmt>=0.9.5"],
    extras_require={"tests": ["pytest>=7"]},
    entry_points={"console_scripts": ["icdsynth = icdsynth.cli:main"]},
)
