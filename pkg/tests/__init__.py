"""
Tests Module
============

Pruebas del solver de campo de fase y de sus estudios asintóticos.
"""
