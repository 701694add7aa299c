"""spokenkit: a toolkit for annotated spoken-language corpora.

The package is organised around a generic annotation model (``core``):
annotations combine a source reference, a range and feature-value
qualifiers, organised into layers and levels over shared timelines.
Format modules project markup (``tei``) and score-style tier files
(``tier``) onto that model and back; ``featstruct`` and ``datacat`` supply
the qualification semantics; ``validate`` reports consistency issues; and
``cli`` wires everything into a command-line tool.
"""

from spokenkit import core, datacat, featstruct, tei, tier, validate

__version__ = "0.1.0"

__all__ = ["core", "datacat", "featstruct", "tei", "tier", "validate", "__version__"]
