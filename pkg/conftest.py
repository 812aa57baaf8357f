# Test wiring for running the Django test suite under plain pytest
# (equivalent to what `python manage.py test` sets up).
import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'pnet.settings')
django.setup()
