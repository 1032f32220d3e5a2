"""The general package information for tsnswitch."""
from pathlib import Path

from setuptools import find_packages
from setuptools import setup


DESCRIPTION = (
    "tsnswitch is a Python package for the admission control and slot-level "
    "simulation of time-sensitive traffic in input-queued crossbar switches."
)
README = Path("README.rst").read_text()


setup(
    name="tsnswitch",
    version="0.1.0",
    description=DESCRIPTION,
    long_description=DESCRIPTION + "\n\n" + README,
    long_description_content_type="text/x-rst",
    author="The tsnswitch Development Team",
    python_requires=">=3.7.0",
    packages=find_packages(),
    license="MIT",
    keywords=["Time-Sensitive Networking", "Switch Scheduling", "Latin Squares"],
    classifiers=[
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3.7",
        "Programming Language :: Python :: 3.8",
    ],
    platforms="any",
    install_requires=["click", "joblib", "numba", "numpy", "pandas", "pyyaml"],
    entry_points={"console_scripts": ["tsnswitch=tsnswitch.cli:main"]},
    package_data={"tsnswitch": ["tests/resources/*.yaml", "tox.ini"]},
    include_package_data=True,
    zip_safe=False,
)
