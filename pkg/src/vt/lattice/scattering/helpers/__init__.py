#!/usr/bin/env python3
# coding=utf-8

"""
File system and argparse helpers of the command line.
"""
