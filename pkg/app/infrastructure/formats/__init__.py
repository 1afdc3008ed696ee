"""
Text formats for matroids, digraph representations and knowledge bases.
"""
