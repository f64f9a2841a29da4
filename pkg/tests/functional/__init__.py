"""Pygrushin functional tests"""
