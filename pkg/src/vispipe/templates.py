"""Access to the versioned prompt template files shipped with the package."""

from __future__ import annotations

from importlib import resources


def load_template(name: str) -> str:
    """Read a template from ``vispipe/templates`` as text."""
    return resources.files("vispipe").joinpath("templates", name).read_text(encoding="utf-8")
