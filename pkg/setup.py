from setuptools import setup

setup(
  name='graphviewpoints',
  packages=['graphviewpoints',],
  install_requires=['numpy', 'pandas', 'networkx', 'scipy', 'matplotlib'],
  extras_require={'tests': ['pytest']},
  entry_points={'console_scripts': ['graphviewpoints=graphviewpoints.cli:main']},
  version='0.1',
  license='GPL-3.0',
  description='Aesthetic measures and learned viewpoint quality for 3D graph drawings',
  long_description=open('README.md').read()
)
