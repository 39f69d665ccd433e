from distutils.core import setup
from setuptools import find_packages

setup(name='finered',
      version='0.1.0',
      description='fine-grained reductions between triangle, min-plus, 3SUM and OV problems, checked against brute-force oracles',
      packages=find_packages(exclude=['tests']),
      tests_require = [
          'pytest',
          'pytest-asyncio'
      ],
      install_requires=[
          'pydantic >= 2.6.0',
          'numpy >= 1.24',
          'networkx >= 3.0'
      ],
      entry_points={
          'console_scripts': [
              'finered-gen = finered.cli:cl_gen',
              'finered-reduce = finered.cli:cl_reduce',
              'finered-verify = finered.cli:cl_verify',
              'finered-account = finered.cli:cl_account',
          ],
      },
)
