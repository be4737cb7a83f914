"""
Tests package for the kktower engine
"""
