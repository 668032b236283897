from .interface import Interface
