"""Exact Clifford modules, superconnection Chern forms and differential cocycles."""
