from singular_lue.config.settings import Settings, get_settings

__all__ = ["Settings", "get_settings"]
