"""Console script entry point: `deniakit <command> ...`."""

import os
import sys

import django


def main(argv=None):
    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "deniakit.conf.settings")
    django.setup()

    from deniakit.management.commands.deniakit import Command

    argv = sys.argv[1:] if argv is None else list(argv)
    Command().run_from_argv(["deniakit", "deniakit", *argv])


if __name__ == "__main__":
    main()
