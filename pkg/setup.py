from setuptools import setup, find_packages


with open("README.md", "r") as fh:
    long_description = fh.read()


setup(
    name="tempoca",
    version="0.1.0",
    author="",
    author_email="",
    description="Causal discovery for multivariate time series with PC-stable and PMIME",
    long_description=long_description,
    long_description_content_type="text/markdown",
    url="",
    package_dir={"": "python"},
    packages=find_packages(where="python"),
    python_requires=">=3.8",
    install_requires=[
        "numpy>=1.20",
        "scipy>=1.6",
        "pandas>=1.5",
        "tqdm",
        "joblib>=1.3",
    ],
    extras_require={
        "tests": ["pytest>=7"],
    },
    entry_points={
        "console_scripts": ["tempoca=tempoca.cli:main"],
    },
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License"
    ]
)
