std::string encryptMessage(const std::string &message, const unsigned char *key) {
    EVP_CIPHER_CTX *ctx = EVP_CIPHER_CTX_new();
    unsigned char iv[AES_BLOCK_SIZE];
    RAND_bytes(iv, AES_BLOCK_SIZE);
    EVP_EncryptInit_ex(ctx, EVP_aes_128_cbc(), NULL, key, iv);
    std::vector<unsigned char> ciphertext(message.size() + AES_BLOCK_SIZE);
    int len;
    EVP_EncryptUpdate(ctx, ciphertext.data(), &len, (unsigned char*)message.data(), message.size());
