#!/usr/bin/env python3
# coding=utf-8

"""
Exit codes used by the lattice scattering pipeline and its command line.

The taxonomy lets scripts tell misconfiguration apart from numerical trouble
and from a genuine violation of a physical identity.
"""

EXIT_OK = 0
"Everything is okay"

ERR_GENERIC_ERR = 1
"Some generic error"

ERR_CONFIG = 2
"Malformed configuration or invalid command line usage"

ERR_INVALID_USAGE = ERR_CONFIG
"Invalid usage of a command or an operation"

ERR_NUMERICAL_FAILURE = 3
"A numerical routine failed: Morse check, sampling, integration, ambiguous boundary value"

ERR_PHYSICS_VIOLATION = 4
"A physical identity or hypothesis is violated, e.g. a Levinson residual beyond tolerance"

ERR_SIGINT_RECEIVED = 130  # Ctrl-C
"Interrupt signal received"
