# export_fixtures.py
import os
import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'pnet.settings')
django.setup()

from django.conf import settings

from proofnets.corpus import write_corpus

folder = settings.PNET_FIXTURES_DIR
nets, derivations = write_corpus(folder)

print(f"✅ {nets} nets and {derivations} derivations written to {folder}")
