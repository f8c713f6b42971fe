from setuptools import setup, find_packages

with open("README.rst", "r") as fh:
    long_description = fh.read()

# Get the version.
version = {}
with open("refina/version.py") as fp:
    exec(fp.read(), version)

setup(
    name='refina',
    version=version['__version__'],
    description='Python package to refine network alignments by matched '
                'neighborhood consistency.',
    long_description=long_description,
    long_description_content_type="text/x-rst",
    license='MIT',
    classifiers=[
        'Development Status :: 4 - Beta',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: MIT License',
        'Programming Language :: Python :: 3.6',
        'Programming Language :: Python :: 3.7',
        'Programming Language :: Python :: 3.8',
        'Topic :: Scientific/Engineering :: Information Analysis',
    ],
    platforms='Windows, Mac OS-X, Linux',
    install_requires=['numpy>=1.17', 'pandas>=0.25', 'scipy>=1.4'],
    packages=find_packages(exclude=["tests"]),
    entry_points={
        'console_scripts': ['refina=refina.cli:main'],
    },
)
