"""DCC-SE keyword search, its KT-IND-CKA distinguishing attack, and the designated-tester fix."""

__version__ = "0.1.0"
