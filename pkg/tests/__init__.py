"""Test suite for the trialtables package."""
