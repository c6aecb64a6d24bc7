"""
Command-line interface for Free Group Lab
"""
