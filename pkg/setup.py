import sys
from setuptools import setup, find_packages

open_kwds = {}
if sys.version_info > (3,):
    open_kwds['encoding'] = 'utf-8'

with open('README.rst', **open_kwds) as f:
    readme = f.read()

setup(name='rsrptools',
      version='0.1.0',
      description='Rotation planning with predictive maintenance on state-expanded event graphs.',
      long_description=readme,
      classifiers=[],
      keywords='rolling stock, rotation planning, predictive maintenance, integer programming',
      license='MIT',
      packages=find_packages(exclude=['docs','tests']),
      include_package_data=True,
      zip_safe=False,
      python_requires='>=3.8',
      install_requires=['numpy>=1.17',
                        'scipy>=1.4',
                        'sympy>=1.5',
                        'pulp>=2.1',
                        'networkx>=2.4',
                        'pydot>=1.4'],
      entry_points={'console_scripts': ['rsrp=rsrptools.cli:main']},
      setup_requires=['pytest-runner'],
      tests_require=['pytest']
      )
