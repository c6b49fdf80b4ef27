#! /usr/bin/env python3

import os
from setuptools import setup, find_packages
import subprocess
import shutil


class InvalidSetupError(Exception):
    pass


def create_mo_files():
    """Converts .po templates to readable .mo files using msgfmt."""
    localedir = 'src/aligndebate/resources/locale'
    # Read the docs has no gettext, and the catalogs are optional
    if os.environ.get("READTHEDOCS") == "True" or not os.path.isdir(localedir):
        return []
    if shutil.which("msgfmt") is None:
        raise InvalidSetupError("gettext not installed but is required.")

    langs = next(os.walk(localedir))[1]
    po_dirs = [localedir + '/' + l + '/LC_MESSAGES/' for l in langs]
    for d in po_dirs:
        po_files = [
            f for f in next(os.walk(d))[2] if os.path.splitext(f)[1] == '.po'
        ]
        for po_file in po_files:
            filename, extension = os.path.splitext(po_file)
            mo_file = filename + '.mo'
            msgfmt_cmd = 'msgfmt {} -o {}'.format(d + po_file, d + mo_file)
            subprocess.call(msgfmt_cmd, shell=True)
    return ["locale/" + l + "/LC_MESSAGES/*.mo" for l in langs]


def read(fname):
    with open(os.path.join(os.path.dirname(__file__), fname)) as file:
        return file.read()


if __name__ == "__main__":
    setup(
        name="AlignDebate",
        version="0.3.0",
        package_dir={"": "src"},
        packages=find_packages("src"),
        python_requires=">=3.6",
        install_requires=["parse>=1.6.6", "yapsy==1.11.223", "numpy>=1.17",
                          "requests>=2.22.0", "tenacity>=6.0"],
        extras_require={"test": ["pytest>=5.0"]},
        entry_points={
            'console_scripts': [
                "aligndebate = aligndebate.interface.cli:main",
            ],
        },
        package_data={
            "aligndebate.resources": ["prompts/*.txt"] + create_mo_files()
        },
        # Metadata
        author="AlignDebate contributors",
        description="Aligns entities between knowledge graphs by embedding "
        "retrieval and multi-agent debate",
        long_description=read("README.rst"),
        license="Apache 2.0",
        keywords="entity alignment, knowledge graph, LLM agents, debate",
    )
