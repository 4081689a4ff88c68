"""framework/__init__.py

The certification engine. Problem folders under problems/ never edit it.
"""
