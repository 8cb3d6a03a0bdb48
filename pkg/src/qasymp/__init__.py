"""Numerics for q-series, theta functions and certified Plancherel-Rotach asymptotics."""
