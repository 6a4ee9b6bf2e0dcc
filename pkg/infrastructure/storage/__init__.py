"""File-backed artifact storage"""
