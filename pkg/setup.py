from setuptools import setup, find_packages

setup(
    name="regimerisk-python",
    version="0.3.0",
    description="Copula-DCC-GARCH market regime identification and CoVaR systemic-risk analysis.",
    long_description=open("README.md").read(),
    long_description_content_type="text/markdown",
    packages=find_packages(where="src"),
    package_dir={"": "src"},
    install_requires=[
        "numpy>=1.26,<2.1",
        "pandas>=2.0",
        "scipy>=1.11",
        "statsmodels>=0.14",
        "scikit-learn>=1.3",
        "numba>=0.59",
        "pydantic>=2.5",
    ],
    entry_points={"console_scripts": ["regimerisk=regimerisk.cli:main"]},
    python_requires=">=3.9",
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: Apache Software License",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Topic :: Office/Business :: Financial",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    include_package_data=True,
    license="Apache License 2.0"
)
