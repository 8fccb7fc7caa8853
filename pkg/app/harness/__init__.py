"""Experiment harness"""
