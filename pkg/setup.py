from setuptools import setup, find_packages

setup(
    name         = 'layer-fem',
    version      = '0.4.2',
    description  = 'Finite elements on layer-adapted S-type meshes and balanced-norm convergence studies.',
    long_description = open('README.md').read(),
    long_description_content_type = 'text/markdown',
    license      = 'BSD',
    packages     = find_packages(exclude=("tests",)),
    python_requires = ">=3.10",
    install_requires=(
        "joblib",
        "numpy",
        "pandas",
        "scipy",
        "typing_extensions",
        "tomli; python_version < '3.11'",
    ),
    extras_require = {
        "tests": ["hypothesis"],
        "lint": ["flake8", "flake8-import-order", "mypy"],
    },
    entry_points = {
        "console_scripts": ["layerfem = layerfem.harness.cli:main"],
    },
    scripts = [],
    classifiers = [
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: BSD License',
        'Operating System :: OS Independent',
        'Programming Language :: Python :: 3',
        'Topic :: Scientific/Engineering :: Mathematics',
    ],
    package_data={"layerfem": ["py.typed"]}
)
