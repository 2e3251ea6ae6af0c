from setuptools import setup, find_packages

setup(
    name="elliptic_spectra",
    version="0.1",
    packages=find_packages(exclude=["tests", "tests.*", "scripts", "scripts.*"]),
    python_requires=">=3.9",
    install_requires=[
        "numpy>=1.21.0",
        "scipy>=1.9.0",
        "pandas>=1.3.0",
        "matplotlib==3.8.2",
        "pydantic==2.5.2",
        "python-dotenv>=0.19.0",
    ],
    entry_points={
        "console_scripts": [
            "espectra=src.cli.main:main",
        ],
    },
)
