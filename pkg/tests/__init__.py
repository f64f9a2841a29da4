# to avoid setuptools/distutils bug
