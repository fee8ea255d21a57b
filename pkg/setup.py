from setuptools import setup

setup(
    name='dvspy',
    version='0.1',
    packages=['dvspy'],
    license='',
    long_description=open('README.rst').read(),
    python_requires='>=3.8',
    install_requires=['numpy>=1.17', 'scipy>=1.5', 'dcor>=0.5'],
    extras_require={'test': ['pytest>=7']},
    entry_points={'console_scripts': ['dvs=dvspy.cli:main']},
)
