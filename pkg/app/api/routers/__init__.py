"""Routers, one per engine mode"""
