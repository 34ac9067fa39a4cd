"""
Test suite for cmxprony.
"""
