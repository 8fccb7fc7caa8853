"""Randomized combinatorial engines"""
