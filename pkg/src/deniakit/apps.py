from django.apps import AppConfig


class DeniakitConfig(AppConfig):
    name = "deniakit"
    verbose_name = "Plausibly deniable communication"
