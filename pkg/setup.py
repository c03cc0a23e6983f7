import setuptools

setuptools.setup(
    name='opentri',
    version='0.1.0',
    description='Comparison geometry of open triangles on warped products',
    packages=setuptools.find_packages(exclude=['tests']),
    python_requires='>=3.10',
    install_requires=[
        'numpy>=1.24',
        'scipy>=1.10',
        'tomli>=1.1; python_version < "3.11"',
    ],
    extras_require={
        'dev': ['pytest>=7.0', 'hypothesis>=6.0'],
    },
    entry_points={
        'console_scripts': ['opentri=opentri.cli:main'],
    },
)
