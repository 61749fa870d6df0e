"""
CLI Commands Package
"""
