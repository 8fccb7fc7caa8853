"""HTTP surface and error translation"""
