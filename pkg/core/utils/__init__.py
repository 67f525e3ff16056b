"""
Scenario config loading
"""
