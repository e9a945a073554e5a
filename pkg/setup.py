# setup.py
from setuptools import setup, find_packages

setup(
    name="kernel-queues",
    version="0.1.0",
    packages=find_packages(exclude=["tests"]),
    install_requires=[
        "numpy>=1.24",
        "scipy>=1.10",
        "pandas>=2.1.2",
        "PyYAML>=6.0.1",
        "python-dotenv>=1.0.0",
        "psutil>=5.9",
    ],
    entry_points={"console_scripts": ["kq = src.cli:main"]},
    description="Stationary queue-length tails of discrete-time queues by generating functions "
                "and the kernel method, checked against a truncated-chain oracle",
    python_requires=">=3.8",
)
