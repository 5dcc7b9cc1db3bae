"""Reminiscence chatbot engine: memory trees, proactive dialogue, evaluation."""

__version__ = "0.1.0"
