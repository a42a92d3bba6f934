"""Test suite for the GAS-GSM simulator"""
