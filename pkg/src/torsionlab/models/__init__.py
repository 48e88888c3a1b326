"""Concrete complexes: files, the flat 3-torus with flux, simplicial models, gauges."""
