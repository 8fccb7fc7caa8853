"""Prague Dimension Lab: clique partitions, hypergraph colouring and product representations"""
