from setuptools import find_packages, setup

install_requires = [dep.strip() for dep in open('requirements.txt')]

setup(
    name='vilenkinlab',
    version='1.0',
    packages=find_packages(),
    license='MIT',
    description='Numerical verification of noncommutative Vilenkin-Fourier estimates',
    include_package_data=True,
    package_data={'vilenkinlab': ['*/configs/*.cfg']},
    install_requires=install_requires,
    python_requires='>=3.8',
    entry_points={
        'console_scripts': [
            'vilenkinlab=vilenkinlab.cli:execute',
        ],
    },
)
