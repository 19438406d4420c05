import setuptools

with open("README.md", "r") as fh:
    long_description = fh.read()

with open("requirements.txt", "r") as fh:
    install_requires = [line.strip() for line in fh if line.strip() and not line.startswith("#")]

setuptools.setup(
    name="DYNHEIGHT",
    version="1.0.0",
    description="Canonical heights, orbits, local heights and equilibrium measures of dynamical systems with several maps",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=setuptools.find_packages(exclude=["tests", "evaluations"]),
    install_requires=install_requires,
    python_requires=">=3.8",
    entry_points={"console_scripts": ["dynheight=dynheight.cli:main"]},
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
)
