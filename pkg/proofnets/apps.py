from django.apps import AppConfig

class ProofnetsConfig(AppConfig):
    name = 'proofnets'
    verbose_name = 'Proof-net analysis'
