from importlib.metadata import version

__version__ = version("lsm-rum-tree")
