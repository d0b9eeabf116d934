"""Exact computation of Ext groups for finitely presented modules.

Three settings share one resolution engine: abelian groups over the
integers, modules over the group ring of a finite group, and abelian
presheaves on a finite poset.  All arithmetic is exact.
"""

__version__ = "0.1.0"
